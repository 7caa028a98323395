#include "cellforest/cli.hpp"

int main(int argc, char** argv) { return cellforest::cli_dispatch(argc, argv); }
