#include "gmp_overbound/cli.hpp"

int main(int argc, char** argv) { return gmpbound::cli::dispatch(argc, argv); }
