#include "impactlab/cli.hpp"

int main(int argc, char** argv) { return impactlab::run_cli(argc, argv); }
