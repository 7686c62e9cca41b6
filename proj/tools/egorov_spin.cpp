#include "egorov/cli.hpp"

int main(int argc, char** argv) { return egorov::cli_main(argc, argv); }
