#include "ssk/cli.hpp"

int main(int argc, char** argv) { return ssk::cli_main(argc, argv); }
