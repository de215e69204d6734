#include "otrm/cli.hpp"

int main(int argc, char** argv) { return otrm::run_cli(argc, argv); }
