#include "cli.hpp"

int main(int argc, char **argv) { return gdv::cli::run(argc, argv); }
