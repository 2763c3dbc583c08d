#include "adass/cli.hpp"

int main(int argc, char** argv) { return adass::run_cli(argc, argv); }
