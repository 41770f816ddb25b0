"""creditvar.model package - portfolio data model and file ingestion."""
