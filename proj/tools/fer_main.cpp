#include "fer/cli.hpp"

int main(int argc, char** argv) { return fer::cli::run(argc, argv); }
