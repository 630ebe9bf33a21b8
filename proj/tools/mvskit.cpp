#include "mvskit/cli.hpp"

int main(int argc, char** argv) { return mvskit::cli::run(argc, argv); }
