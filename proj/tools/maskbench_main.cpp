#include "maskbench/cli/app.hpp"

int main(int argc, char** argv) {
    return maskbench::cli::run_cli(argc, argv);
}
