#include "qhgeo/cli.hpp"

int main(int argc, char** argv) { return qhgeo::cli::main(argc, argv); }
