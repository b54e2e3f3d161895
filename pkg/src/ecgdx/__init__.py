"""Two-lead ECG arrhythmia classification toolkit.

Pipeline: WFDB/CSV ingestion -> median denoising -> Pan-Tompkins R-peak
detection -> 300-sample beat segmentation -> AR + statistical features
(8 per lead) -> SVM / KNN / MLP / naive Bayes -> single-database and
cross-database evaluation.
"""

__version__ = "0.1.0"
