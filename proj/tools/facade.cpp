#include "facade/cli.hpp"

int main(int argc, char** argv) { return facade::cli::run(argc, argv); }
