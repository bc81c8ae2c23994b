from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from routes.dags import router as dags_router
from routes.experiments import router as experiments_router

app = FastAPI(title="gpu-dag-sched")

app.add_middleware(
    CORSMiddleware,
    allow_origins=[
        "http://localhost:5173",  # Local development
        "http://localhost:3000",  # Alternative local port
    ],
    allow_credentials=True,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

# Include routers
app.include_router(dags_router)
app.include_router(experiments_router)


@app.get("/health")
def health_check():
    return {"status": "ok"}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
