#include "lifetail/cli.hpp"

int main(int argc, char** argv) { return lifetail::run(argc, argv); }
