#include "shscert/cli.hpp"

int main(int argc, char** argv) { return shscert::run_cli(argc, argv); }
