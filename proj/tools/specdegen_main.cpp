#include "specdegen/cli.hpp"

int main(int argc, char** argv) { return specdegen::run(argc, argv); }
