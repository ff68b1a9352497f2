#include "timinggame/cli.hpp"

int main(int argc, char** argv) { return timinggame::cli::run(argc, argv); }
