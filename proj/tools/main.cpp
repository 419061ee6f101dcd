#include "membrane/commands.hpp"

int main(int argc, char** argv) { return membrane::cli_main(argc, argv); }
