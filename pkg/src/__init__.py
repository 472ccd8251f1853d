# k-monotone density estimation
