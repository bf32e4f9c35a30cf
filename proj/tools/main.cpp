#include "cli.hpp"

int main(int argc, char** argv) { return netdist::cli::run(argc, argv); }
