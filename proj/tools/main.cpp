#include "cli.hpp"

int main(int argc, char** argv) { return requant::cli::run(argc, argv); }
