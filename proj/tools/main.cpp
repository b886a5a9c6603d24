#include "cli.hpp"

int main(int argc, char** argv) { return sdnet::cli::main(argc, argv); }
