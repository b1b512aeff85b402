#include "vg/dispatch.hpp"

int main(int argc, char** argv) { return vg::run_cli(argc, argv); }
