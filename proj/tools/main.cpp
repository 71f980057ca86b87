#include "gradmix/cli.hpp"

int main(int argc, char** argv) { return gradmix::cli::run(argc, argv); }
