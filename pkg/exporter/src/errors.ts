export class ExportError extends Error {}

export class ModelNotFound extends ExportError {}

export class DatasetNotFound extends ExportError {}

export class ShapeMismatch extends ExportError {}
