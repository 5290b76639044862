#include <orbitarm/cli.hpp>

int main(int argc, char** argv) { return orbitarm::cli::run(argc, argv); }
