#include "kignn/workbench.hpp"

int main(int argc, char** argv) { return kignn::run_cli(argc, argv); }
