#include "ctrfn/cli.hpp"

int main(int argc, char** argv) { return ctrfn::run_cli(argc, argv); }
