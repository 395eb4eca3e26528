#include "threshold_regret/cli.hpp"

int main(int argc, char** argv) { return threshold_regret::run_cli(argc, argv); }
