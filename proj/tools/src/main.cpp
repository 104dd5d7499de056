#include "sedkit/cli.h"

int main(int argc, char** argv) { return sedkit::cli::run_cli(argc, argv); }
