from src.app_runner import run
if __name__ == "__main__":
    run()
