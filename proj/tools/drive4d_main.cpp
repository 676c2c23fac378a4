#include "drive4d/cli.hpp"

int main(int argc, char** argv) { return drive4d::cli::run(argc, argv); }
