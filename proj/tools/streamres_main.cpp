#include <iostream>

#include "streamres/cli.hpp"

int main(int argc, char** argv) {
    return streamres::cli::run(argc, argv, std::cout, std::cerr);
}
