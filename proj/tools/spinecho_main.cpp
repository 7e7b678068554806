#include "spinecho/runner.hpp"

int main(int argc, char** argv) { return spinecho::cli_main(argc, argv); }
