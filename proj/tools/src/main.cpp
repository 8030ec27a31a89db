#include "commands.hpp"

int main(int argc, char** argv) { return smbm::cli::run(argc, argv); }
