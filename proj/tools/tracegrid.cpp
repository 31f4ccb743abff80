#include <tracegrid/cli.hpp>

int main(int argc, char** argv) { return tracegrid::cli::run(argc, argv); }
