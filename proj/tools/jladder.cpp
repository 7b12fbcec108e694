#include "jladder/cli.hpp"

int main(int argc, char** argv) { return jladder::cli::run(argc, argv); }
