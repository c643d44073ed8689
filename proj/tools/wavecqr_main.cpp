#include "wavecqr/cli.hpp"

int main(int argc, char** argv) { return wavecqr::cli::run(argc, argv); }
