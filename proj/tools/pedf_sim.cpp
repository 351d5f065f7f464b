#include "pedf/harness.hpp"

int main(int argc, char** argv) { return pedf::cli_main(argc, argv); }
