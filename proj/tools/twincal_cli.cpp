#include "twincal/io.hpp"

int main(int argc, char** argv) { return twincal::run_cli(argc, argv); }
