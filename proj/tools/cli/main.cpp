#include "commands.hpp"

int main(int argc, char** argv) { return mdesk::run(argc, argv); }
