#include "mz/cli.hpp"

int main(int argc, char** argv) { return mz::cli::main(argc, argv); }
