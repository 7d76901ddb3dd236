#include "tipping/cli.hpp"

int main(int argc, char** argv) { return tipping::cli_run(argc, argv); }
