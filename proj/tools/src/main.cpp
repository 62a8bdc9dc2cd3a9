#include "commands.hpp"

int main(int argc, char** argv) { return anntune::cli::run(argc, argv); }
