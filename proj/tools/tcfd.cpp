#include "tcfd/cli.hpp"

int main(int argc, char** argv) { return tcfd::cli::run(argc, argv); }
