#include "sben/cli.hpp"

int main(int argc, char** argv) { return sben::cli::run(argc, argv); }
