#include "lowlying/cli.hpp"

int main(int argc, char** argv) { return lowlying::cli::run(argc, argv); }
