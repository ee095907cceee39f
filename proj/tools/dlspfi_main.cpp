#include "dlspfi/experiments.hpp"

int main(int argc, char** argv) { return dlspfi::cli_main(argc, argv); }
