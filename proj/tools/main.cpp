#include "cli.hpp"

int main(int argc, char** argv) { return gsc::cli::dispatch(argc, argv); }
