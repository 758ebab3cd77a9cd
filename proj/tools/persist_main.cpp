#include "persist/cli.hpp"

int main(int argc, char** argv) { return persist::run_cli(argc, argv); }
