#include "cli_main.hpp"

int main(int argc, char** argv) { return slrma::cli::cli_main(argc, argv); }
