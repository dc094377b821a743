#include "mcf4d/cli.hpp"

int main(int argc, char** argv) { return mcf4d::run_command(argc, argv); }
