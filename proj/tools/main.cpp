#include "monlab/cli.hpp"

int main(int argc, char** argv) { return monlab::run_cli(argc, argv); }
