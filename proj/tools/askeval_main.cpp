#include "askeval/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return askeval::cli::run(argc, argv, std::cout, std::cerr);
}
