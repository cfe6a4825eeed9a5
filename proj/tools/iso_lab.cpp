#include "isolab/cli.hpp"

int main(int argc, char** argv) { return isolab::cli_main(argc, argv); }
