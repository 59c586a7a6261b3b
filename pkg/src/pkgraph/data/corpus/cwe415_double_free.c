void foo()
{
    char buf[24];
    printf("Please enter your name:\n");
    gets(buf);
    char* ptr = (char*)malloc(8);
    doSomething(ptr);
    free(ptr);
    free(ptr);
}
