#include "melm/cli.hpp"

int main(int argc, char** argv) { return melm::run_cli(argc, argv); }
