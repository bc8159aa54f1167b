#include "vpflow/cli.hpp"

int main(int argc, char** argv) { return vpflow::cli_run(argc, argv); }
