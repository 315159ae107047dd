#include "levy/cli.hpp"

int main(int argc, char** argv) { return levy::cli::run(argc, argv); }
