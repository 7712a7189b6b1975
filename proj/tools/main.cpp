#include "cli.hpp"

int main(int argc, char** argv) { return retexkit::cli::run(argc, argv); }
