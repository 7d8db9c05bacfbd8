#include <cstdio>
#include <cstring>
int main(int argc, char** argv) {
    if (argc < 3) { std::puts("0"); return 0; }
    FILE* fin = std::fopen(argv[1], "rb");
    FILE* fout = std::fopen(argv[2], "rb");
    if (!fin || !fout) { std::puts("0"); return 0; }
    long long x;
    if (std::fscanf(fin, "%lld", &x) != 1) { std::puts("0"); return 0; }
    char got[64];
    if (std::fscanf(fout, "%63s", got) != 1) { std::puts("0"); return 0; }
    std::puts(std::strcmp(got, (x % 2 == 0) ? "even" : "odd") == 0 ? "1" : "0");
    return 0;
}
