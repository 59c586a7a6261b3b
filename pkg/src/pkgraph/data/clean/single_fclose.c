#include <stdio.h>

void main() {
    FILE* fp = fopen("data.txt", "r");
    fclose(fp);
}
