#include "courtforge/cli.hpp"

int main(int argc, char** argv) { return courtforge::cli::run(argc, argv); }
