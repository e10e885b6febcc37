#include "cli.hpp"

int main(int argc, char** argv) { return parking::cli::run(argc, argv); }
