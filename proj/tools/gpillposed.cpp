#include <gpillposed/cli.hpp>

int main(int argc, char** argv) { return gpill::cli::main(argc, argv); }
