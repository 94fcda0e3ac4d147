#include "tcsde/cli.hpp"

int main(int argc, char** argv) { return tcsde::cli_main(argc, argv); }
