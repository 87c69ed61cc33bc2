#include "cli.hpp"

int main(int argc, char** argv) { return legendrian::cli::run(argc, argv); }
