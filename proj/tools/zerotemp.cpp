#include "zerotemp/cli.hpp"

int main(int argc, char** argv) { return zerotemp::cli::dispatch(argc, argv); }
