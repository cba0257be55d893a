#include "shapfed/cli.hpp"

int main(int argc, char** argv) { return shapfed::run_cli(argc, argv); }
