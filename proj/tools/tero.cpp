#include "tero_cli.hpp"

int main(int argc, char** argv) { return tero::cli::run(argc, argv); }
