#include "cli.hpp"

int main(int argc, char** argv) { return spherelab::cli::run(argc, argv); }
