#include "rolle/cli.hpp"

int main(int argc, char** argv) { return rolle::cli::run(argc, argv); }
