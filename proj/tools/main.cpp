#include "cli.hpp"

int main(int argc, char** argv) { return lpg::cli_main(argc, argv); }
