#include "tvme/cli.hpp"

int main(int argc, char** argv) {
    return tvme::cli::run(argc, argv);
}
