#include <iostream>
#include <string>
#include <vector>

#include "stereo_bp/cli.hpp"

int main(int argc, char** argv) {
    return stereo_bp::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
