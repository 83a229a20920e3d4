#include "tecromac/cli.hpp"

int main(int argc, char **argv) { return tecromac::cli_main(argc, argv); }
